#include <iostream>

#include "gfield/cli.hpp"

int main(int argc, char** argv) { return gfield::run_command(argc, argv, std::cout, std::cerr); }
