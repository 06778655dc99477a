#include "soclearn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return soclearn::run_cli(args, std::cout, std::cerr);
}
