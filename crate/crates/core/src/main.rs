fn main() -> std::process::ExitCode {
    peephole_forge::cli::run()
}
