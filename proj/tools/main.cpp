#include "cli.hpp"

int main(int argc, char** argv) { return pdn::cli_main({argv + 1, argv + argc}); }
