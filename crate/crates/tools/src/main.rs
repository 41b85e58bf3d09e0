fn main() -> std::process::ExitCode {
    drinfeld_tools::cli::main()
}
