#include "dsoup/cli.hpp"

int main(int argc, char** argv) { return dsoup::cli::dispatch(argc, argv); }
