#include <iostream>
#include <string>
#include <vector>

#include "slogan/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return slogan::cli::run(args, std::cout, std::cerr);
}
