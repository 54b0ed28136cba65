#include <iostream>

#include "spamsift/cli.hpp"

int main(int argc, char** argv) { return spamsift::cli::run(argc, argv, std::cout, std::cerr); }
