#pragma once

#include <stdexcept>
#include <string>

namespace greyharvest {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedUri : public Error {
 public:
  using Error::Error;
};

class UnsupportedScheme : public Error {
 public:
  using Error::Error;
};

// Base of everything the fetcher can raise; the service maps these to 502.
class FetchError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public FetchError {
 public:
  using FetchError::FetchError;
};

class TooManyRedirects : public FetchError {
 public:
  using FetchError::FetchError;
};

class BodyTooLarge : public FetchError {
 public:
  using FetchError::FetchError;
};

class RobotsDisallowed : public FetchError {
 public:
  using FetchError::FetchError;
};

class HttpError : public FetchError {
 public:
  HttpError(int status, const std::string& what) : FetchError(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class FeedParseError : public Error {
 public:
  using Error::Error;
};

class LinkNotFound : public Error {
 public:
  using Error::Error;
};

class MissingTitle : public Error {
 public:
  using Error::Error;
};

class UnknownPurl : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace greyharvest
