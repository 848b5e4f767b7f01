#include "mvtrans/app/cli.hpp"

int main(int argc, char** argv) { return mvtrans::app::run_cli(argc, argv); }
