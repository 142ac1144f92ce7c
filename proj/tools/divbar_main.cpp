#include "divbar/cli.hpp"

int main(int argc, char** argv) { return divbar::cli::dispatch(argc, argv); }
