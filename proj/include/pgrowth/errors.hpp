#pragma once

#include <stdexcept>
#include <string>

namespace pgrowth {

enum class Errc {
  ParseError,
  UnknownGenerator,
  ArityMismatch,
  BadPermutation,
  UnsupportedPrime,
  LevelTooLarge,
  DegreeMismatch,
  NotASubgroup,
  NotAMember,
  NotAPGroup,
  CosetSpaceTooLarge,
  BudgetExceeded,
  IncompleteEnumeration,
  CapExceeded,
  PhiVanishesOnGenerators,
  NotGenerating,
  EmptyTable,
  InequalityViolated,
  NotFound,
  Usage,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownGenerator: return "UnknownGenerator";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::BadPermutation: return "BadPermutation";
    case Errc::UnsupportedPrime: return "UnsupportedPrime";
    case Errc::LevelTooLarge: return "LevelTooLarge";
    case Errc::DegreeMismatch: return "DegreeMismatch";
    case Errc::NotASubgroup: return "NotASubgroup";
    case Errc::NotAMember: return "NotAMember";
    case Errc::NotAPGroup: return "NotAPGroup";
    case Errc::CosetSpaceTooLarge: return "CosetSpaceTooLarge";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::IncompleteEnumeration: return "IncompleteEnumeration";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::PhiVanishesOnGenerators: return "PhiVanishesOnGenerators";
    case Errc::NotGenerating: return "NotGenerating";
    case Errc::EmptyTable: return "EmptyTable";
    case Errc::InequalityViolated: return "InequalityViolated";
    case Errc::NotFound: return "NotFound";
    case Errc::Usage: return "Usage";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by the parser; carries a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error(Errc::ParseError, "line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + what),
        line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace pgrowth
