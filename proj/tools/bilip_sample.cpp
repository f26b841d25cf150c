#include <CLI11.hpp>
#include <iostream>

#include "bilip/maps.hpp"

int main(int argc, char** argv) {
  std::string map = "shear_sine", domain = "unit_square", out;
  std::size_t rows = 65, cols = 65;
  CLI::App app{"Write a builtin map as a SAMPLEDMAP grid"};
  app.add_option("--map", map)->capture_default_str();
  app.add_option("--domain", domain, "rectangle to sample")->capture_default_str();
  app.add_option("--rows", rows)->capture_default_str();
  app.add_option("--cols", cols)->capture_default_str();
  app.add_option("--out", out)->required();
  CLI11_PARSE(app, argc, argv);
  try {
    auto o = bilip::make_map(map, bilip::parse_domain(domain));
    bilip::write_sampled_map(*o, rows, cols, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
