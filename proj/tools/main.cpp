#include <iostream>

#include "shallowrl/cli.hpp"

int main(int argc, char** argv) { return shallowrl::cli::dispatch(argc, argv, std::cout, std::cerr); }
