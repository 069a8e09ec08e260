#include <iostream>

#include "mixqcd/cli.hpp"

int main(int argc, char** argv) { return mixqcd::dispatch(argc, argv, std::cout, std::cerr); }
