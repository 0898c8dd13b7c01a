#include <string>
#include <vector>

#include "heatdist_cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return heatdist::cli::run_cli(args);
}
