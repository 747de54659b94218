#include <iostream>
#include <string>
#include <vector>

#include "yoloea/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return yoloea::cli::run(args, std::cout, std::cerr);
}
