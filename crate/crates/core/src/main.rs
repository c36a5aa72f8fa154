fn main() -> std::process::ExitCode {
    hcouple::cli::main()
}
