#pragma once

#include <string>

#include "ontorules/error.hpp"

// Runs `fn` and returns the code of the ontorules::Error it throws, or "" if
// it returns normally.
template <typename Fn>
std::string error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const ontorules::Error& e) {
    return e.code();
  }
  return {};
}

template <typename Fn>
ontorules::Error error_of(Fn&& fn) {
  try {
    fn();
  } catch (const ontorules::Error& e) {
    return e;
  }
  return ontorules::Error("", "no error");
}
