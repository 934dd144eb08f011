#include <iostream>

#include "coolflex/cli/app.hpp"

int main(int argc, char** argv) { return coolflex::cli::run(argc, argv, std::cout, std::cerr); }
