#include <iostream>
#include <string>
#include <vector>

#include "vgm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return vgm::cli::run(args, std::cout, std::cerr);
}
