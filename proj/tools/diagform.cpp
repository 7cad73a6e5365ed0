#include "diagform/cli.hpp"

int main(int argc, char** argv) { return diagform::cli_main(argc, argv); }
