#include <string>
#include <vector>

#include "lagsurf/io.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lagsurf::run_command(args);
}
