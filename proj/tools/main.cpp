#include <iostream>
#include <string>
#include <vector>

#include "toricost/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return toricost::run_cli(args, std::cout, std::cerr);
}
