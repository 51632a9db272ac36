#include <iostream>

#include "cfqsim/cli/cli.hpp"

int main(int argc, char** argv) {
    return cfqsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
