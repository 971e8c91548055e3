fn main() {
    // populated once the hopf module lands
}
