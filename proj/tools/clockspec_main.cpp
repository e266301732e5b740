#include <string>
#include <utility>
#include <vector>

#include "clockspec/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return clockspec::cli::run(std::move(args));
}
