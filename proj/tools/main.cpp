#include "ghicast/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return ghicast::run_cli(argc, argv, std::cout, std::cerr);
}
