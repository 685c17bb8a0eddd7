fn main() {
    std::process::exit(partition_lab::run());
}
