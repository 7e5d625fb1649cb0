#include <iostream>

#include "pfsq/cli.hpp"

int main(int argc, char** argv) {
    return pfsq::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
