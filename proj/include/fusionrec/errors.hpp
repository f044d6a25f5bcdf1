#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fusionrec {

// Every failure raised by the library derives from Error so callers can
// catch broadly and still dispatch on the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FUSIONREC_DEFINE_ERROR(Name)              \
  class Name : public Error {                     \
   public:                                        \
    using Error::Error;                           \
  }

FUSIONREC_DEFINE_ERROR(FileNotFound);
FUSIONREC_DEFINE_ERROR(IoError);
FUSIONREC_DEFINE_ERROR(MalformedInput);
FUSIONREC_DEFINE_ERROR(ShapeMismatch);
FUSIONREC_DEFINE_ERROR(EmptyCorpus);
FUSIONREC_DEFINE_ERROR(DegenerateCorpus);
FUSIONREC_DEFINE_ERROR(EmptyGenreList);
FUSIONREC_DEFINE_ERROR(EmptyInput);
FUSIONREC_DEFINE_ERROR(LengthMismatch);
FUSIONREC_DEFINE_ERROR(InvalidConfig);
FUSIONREC_DEFINE_ERROR(InvalidWeights);
FUSIONREC_DEFINE_ERROR(NoPositivePairs);
FUSIONREC_DEFINE_ERROR(DivergedLoss);
FUSIONREC_DEFINE_ERROR(NonFiniteGradient);
FUSIONREC_DEFINE_ERROR(CorruptFile);
FUSIONREC_DEFINE_ERROR(IncompatibleIndex);
FUSIONREC_DEFINE_ERROR(NoEvalUsers);

#undef FUSIONREC_DEFINE_ERROR

class CorruptIndex : public CorruptFile {
 public:
  using CorruptFile::CorruptFile;
};

class MissingEmbedding : public Error {
 public:
  explicit MissingEmbedding(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

class UnknownSeedId : public Error {
 public:
  explicit UnknownSeedId(std::string id);
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

}  // namespace fusionrec
