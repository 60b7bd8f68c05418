#include "scenario.hpp"

int main(int argc, char** argv) { return mep::cli::cli_main(argc, argv); }
