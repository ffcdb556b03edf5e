fn main() -> std::process::ExitCode {
    treewalk::cli::main()
}
