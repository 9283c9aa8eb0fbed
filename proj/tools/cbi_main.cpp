#include "cbi/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return cbi::run_cli(argc, argv, std::cout, std::cerr);
}
