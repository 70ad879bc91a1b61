#include <iostream>

#include "relunet/cli.hpp"

int main(int argc, char** argv) { return relunet::run_cli(argc, argv, std::cout, std::cerr); }
