#include "lrp/lab.hpp"

int main(int argc, char** argv) { return lrp::cli_main(argc, argv); }
