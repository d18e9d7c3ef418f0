#include <iostream>

#include "epm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return epm::run_cli(args, std::cout, std::cerr);
}
