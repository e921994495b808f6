fn main() {
    println!("pqc");
}
