fn main() -> std::process::ExitCode {
    taylor_implicit::cli::main()
}
