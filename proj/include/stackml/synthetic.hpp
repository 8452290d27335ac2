#pragma once

#include <cstddef>
#include <cstdint>

#include "stackml/dataset.hpp"

namespace stackml {

// Draws `rows` records with the heart_schema() columns from a hand-built
// generative model: the label is drawn first and every feature is sampled
// from a label-dependent distribution with realistic clinical ranges. Useful
// for exercising the pipeline when the public table is not at hand; its
// accuracy levels say nothing about the real data.
LabeledDataset synthesize_heart_like(std::size_t rows, std::uint64_t seed);

}  // namespace stackml
