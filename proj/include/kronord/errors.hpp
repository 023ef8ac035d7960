#pragma once

#include <stdexcept>
#include <string>

namespace kronord {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotAUnit : Error {
    explicit NotAUnit(const std::string& w = "NotAUnit") : Error(w) {}
};
struct NoSolution : Error {
    explicit NoSolution(const std::string& w = "NoSolution") : Error(w) {}
};
struct IrreducibleOverPrimeField : Error {
    explicit IrreducibleOverPrimeField(const std::string& w) : Error(w) {}
};
struct ProjectiveInput : Error {
    explicit ProjectiveInput(const std::string& w = "ProjectiveInput") : Error(w) {}
};
struct NoPhiFound : Error {
    explicit NoPhiFound(const std::string& w = "NoPhiFound") : Error(w) {}
};
struct NotAlmostSplit : Error {
    explicit NotAlmostSplit(const std::string& w) : Error(w) {}
};
struct SplitFailed : Error {
    int precision;
    SplitFailed(const std::string& w, int prec) : Error(w), precision(prec) {}
};
struct Inconclusive : Error {
    explicit Inconclusive(const std::string& w) : Error(w) {}
};

}  // namespace kronord
