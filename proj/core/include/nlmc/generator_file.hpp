#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nlmc/generator.hpp"

namespace nlmc {

// Generator definition file: a JSON document
//
//   {
//     "dimension": 2,
//     "cells": [
//       {"from": 1, "to": 2, "terms": [{"exponents": [1, 0], "coefficient": 1.0}]}
//     ],
//     "metadata": {}
//   }
//
// States are numbered from 1. Only off-diagonal cells are stored; the
// diagonal is always derived. format_generator emits a canonical layout
// (two-space indent, fixed key order, trailing newline), so parsing and
// re-formatting a formatted document reproduces it byte for byte.

/// Throws ParseError (with 1-based line and column for syntax errors).
GeneratorSpec parse_generator(std::string_view text);
GeneratorSpec load_generator(const std::filesystem::path& path);

/// Only polynomial generators can be written; built-ins throw InputError.
std::string format_generator(const GeneratorSpec& spec);
void save_generator(const GeneratorSpec& spec, const std::filesystem::path& path);

}  // namespace nlmc
