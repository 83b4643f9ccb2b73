#include "gew/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return gew::run_cli(argc, argv, std::cout, std::cerr);
}
