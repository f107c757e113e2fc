#include "cli.hpp"

int main(int argc, char** argv) { return jonesq::cli::main_entry(argc, argv); }
