#include "msred/cli.hpp"

int main(int argc, char** argv) {
    return msred::cli_main(argc, argv);
}
