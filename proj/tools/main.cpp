#include <iostream>
#include <string>
#include <vector>

#include "numaplan/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return numaplan::run_cli(args, std::cout, std::cerr);
}
