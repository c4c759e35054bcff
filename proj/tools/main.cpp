#include "dimerlab/lab.hpp"

int main(int argc, char** argv) { return dimerlab::cli_main(argc, argv); }
