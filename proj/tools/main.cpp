#include <iostream>

#include "cafem/cli.hpp"

int main(int argc, char** argv) { return cafem::cli_main(argc, argv, std::cout, std::cerr); }
