#include "cpfix_cli.hpp"

int main(int argc, char** argv) {
    return cpfix::cli::run(argc, argv);
}
