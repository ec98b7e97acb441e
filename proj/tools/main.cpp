#include <iostream>

#include "ontorules/cli.hpp"

int main(int argc, char** argv) { return ontorules::run_cli(argc, argv, std::cout, std::cerr); }
