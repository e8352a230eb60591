#include <iostream>

#include "ctbayes/cli.hpp"

int main(int argc, char** argv) { return ctbayes::cli::run(argc, argv, std::cout, std::cerr); }
