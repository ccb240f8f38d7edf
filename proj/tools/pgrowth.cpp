#include <iostream>

#include <pgrowth/cli.hpp>

int main(int argc, char** argv) {
  pgrowth::RunConfig cfg;
  int st = pgrowth::parse_args(argc, argv, cfg, std::cout, std::cerr);
  if (st >= 0) return st;
  return pgrowth::run(cfg, std::cout, std::cerr);
}
