#include <iostream>

#include "seqgp/cli.hpp"

int main(int argc, char** argv) { return seqgp::cli::run(argc, argv, std::cout, std::cerr); }
