#include <iostream>

#include "hlnet_cli/cli.hpp"

int main(int argc, char** argv) { return hlnet::cli::run(argc, argv, std::cout, std::cerr); }
