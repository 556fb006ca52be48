#include <string>
#include <vector>

#include "plantwin/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return plantwin::run_command(args);
}
