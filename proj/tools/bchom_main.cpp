#include <string>
#include <vector>

#include "bchom/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return bchom::cli::run(std::move(args));
}
