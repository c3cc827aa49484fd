#include "forestfire/cli.hpp"

int main(int argc, char** argv)
{
    return forestfire::cli::main(argc, argv);
}
