#include "simlab/labcli.hpp"

int main(int argc, char** argv) { return simlab::cli_main(argc, argv); }
