#include <vector>
#include <string>

#include "gaslab/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gaslab::run_cli(args);
}
