#include <iostream>
#include <string>
#include <vector>

#include "mvldp/cli.hpp"

int main(int argc, char** argv) {
    return mvldp::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
