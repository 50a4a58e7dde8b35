#include "fd3/cli.hpp"

int main(int argc, char** argv) { return fd3::cli::dispatch(argc, argv); }
