fn main() -> std::process::ExitCode {
    wakeplan::cli::main()
}
