// Copyright 2026 The lsfc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Concrete syntax for formulas and machines: an S-expression reader and
// printers whose output parses back to an equal value (render() on formulas
// and terms already emits this syntax).

#ifndef LSFC_DSL_HPP_
#define LSFC_DSL_HPP_

#include <string>
#include <vector>

#include "lsfc/formula.hpp"
#include "lsfc/machine.hpp"

namespace lsfc {

// One node of the generic S-expression tree.
struct SExpr {
  bool is_atom = true;
  std::string atom;           // valid when is_atom
  std::vector<SExpr> items;   // valid when !is_atom
  int line = 0, col = 0;      // 1-based position of the first character
};

// Parses a whole buffer into a sequence of toplevel S-expressions.
// Comments run from ';' to end of line. Throws FormulaError{parse_error}
// with line/column on malformed input.
std::vector<SExpr> parse_sexprs(const std::string& text);

// Term / formula readers. parse_term needs a sort hint only for bare
// integers and identifiers whose sort is ambiguous in isolation; the
// formula reader supplies hints from sibling operands.
Formula parse_formula(const SExpr& e);
Formula parse_formula(const std::string& text);  // exactly one toplevel form

// Machine file: (machine NAME (params P...) (states S...) (start S)
//                (trans FROM TO FORMULA) ...)
LambdaSFA parse_machine(const SExpr& e);
LambdaSFA parse_machine(const std::string& text);
LambdaSFA load_machine_file(const std::string& path);

std::string serialize_machine(const LambdaSFA& m);

}  // namespace lsfc

#endif  // LSFC_DSL_HPP_
