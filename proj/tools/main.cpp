#include <iostream>
#include <string>
#include <vector>

#include "gapstab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gapstab::run_cli(args, std::cout, std::cerr);
}
