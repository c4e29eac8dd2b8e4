#pragma once

#include <stdexcept>
#include <string>

namespace lacmatch {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A box or sampling pattern left the image.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// Geometric configuration does not determine a unique model.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class PointAtInfinityError : public Error {
 public:
  using Error::Error;
};

/// Bad or unreadable input (files, arguments).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A prepared template cache is absent or incomplete.
class MissingCacheError : public Error {
 public:
  using Error::Error;
};

/// The requested configuration cannot be satisfied (e.g. a label cluster
/// larger than the template size).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, int cluster_id)
      : Error(what), cluster_id_(cluster_id) {}
  int cluster_id() const { return cluster_id_; }

 private:
  int cluster_id_;
};

}  // namespace lacmatch
