#include <iostream>

#include "plidar/cli.hpp"

int main(int argc, char** argv) { return plidar::run_cli(argc, argv, std::cout, std::cerr); }
