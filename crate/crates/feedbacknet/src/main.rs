fn main() {
    std::process::exit(feedbacknet::cli::run_args(std::env::args_os()));
}
