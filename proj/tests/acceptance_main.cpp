int main() { return 1; } // placeholder until the acceptance checks land
