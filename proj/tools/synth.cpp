#include <CLI11.hpp>

#include <iostream>

#include "stackml/error.hpp"
#include "stackml/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic dataset with the heart-disease schema"};
  std::size_t rows = 300;
  std::uint64_t seed = 7;
  std::string out;
  app.add_option("--rows", rows, "Number of records")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--out", out, "CSV path")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    stackml::write_csv(out, stackml::synthesize_heart_like(rows, seed));
  } catch (const stackml::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
