#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return modalign::cli::run(argc, argv, std::cout, std::cerr); }
