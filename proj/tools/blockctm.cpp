#include <iostream>
#include <string>
#include <vector>

#include "blockctm/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return blockctm::app::run_cli(args, std::cout, std::cerr);
}
