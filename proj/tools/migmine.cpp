#include <iostream>

#include "migmine/cli.hpp"

int main(int argc, char** argv) { return migmine::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
