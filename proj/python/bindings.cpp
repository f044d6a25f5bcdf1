#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fusionrec/catalog.hpp"
#include "fusionrec/encoder.hpp"
#include "fusionrec/errors.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"
#include "fusionrec/index.hpp"
#include "fusionrec/recommender.hpp"
#include "fusionrec/scoring.hpp"
#include "fusionrec/text.hpp"

namespace py = pybind11;
namespace fr = fusionrec;

namespace {

// Owns every artifact a query needs; the Recommender only holds references.
class Engine {
 public:
  Engine(const std::string& catalog, const std::string& genre_model, const std::string& model,
         const std::string& index, const std::string& tfidf, const std::string& embeddings)
      : catalog_(fr::clean(fr::load_catalog(catalog, fr::CatalogFormat::Jsonl).catalog)),
        source_(catalog_.of(fr::Domain::Source).items),
        genre_model_(fr::GenreEmbeddingModel::load(genre_model)),
        checkpoint_(fr::load_checkpoint(model)),
        tfidf_(fr::TfidfModel::load(tfidf)),
        index_(fr::load_index(index)),
        encoder_(embeddings.empty()
                     ? std::unique_ptr<fr::EncoderProvider>(std::make_unique<fr::FallbackEncoder>())
                     : std::make_unique<fr::FileEmbeddingProvider>(fr::FileEmbeddingProvider::from_file(embeddings))),
        recommender_(source_, index_, *encoder_, genre_model_, checkpoint_, tfidf_) {}

  std::vector<fr::Recommendation> recommend(const std::vector<std::string>& seeds, std::size_t k,
                                            const std::string& weights) const {
    return recommender_.recommend({seeds, k}, weights.empty() ? fr::ScoreWeights{} : fr::ScoreWeights::parse(weights));
  }

  std::size_t size() const { return index_.size(); }
  std::string provider_id() const { return encoder_->provider_id(); }

 private:
  fr::Catalog catalog_;
  std::vector<fr::Item> source_;
  fr::GenreEmbeddingModel genre_model_;
  fr::FusionCheckpoint checkpoint_;
  fr::TfidfModel tfidf_;
  fr::FeatureIndex index_;
  std::unique_ptr<fr::EncoderProvider> encoder_;
  fr::Recommender recommender_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cross-domain cold-start recommender core";

  auto base = py::register_exception<fr::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<fr::FileNotFound>(m, "FileNotFound", base.ptr());
  py::register_exception<fr::CorruptFile>(m, "CorruptFile", base.ptr());
  py::register_exception<fr::UnknownSeedId>(m, "UnknownSeedId", base.ptr());
  py::register_exception<fr::IncompatibleIndex>(m, "IncompatibleIndex", base.ptr());
  py::register_exception<fr::InvalidWeights>(m, "InvalidWeights", base.ptr());

  py::enum_<fr::Domain>(m, "Domain").value("SOURCE", fr::Domain::Source).value("TARGET", fr::Domain::Target);

  py::class_<fr::Item>(m, "Item")
      .def_readonly("id", &fr::Item::id)
      .def_readonly("title", &fr::Item::title)
      .def_readonly("description", &fr::Item::description)
      .def_readonly("genres", &fr::Item::genres)
      .def_readonly("domain", &fr::Item::domain)
      .def("__repr__", [](const fr::Item& i) { return "<Item " + i.id + " '" + i.title + "'>"; });

  m.def("load_catalog", [](const std::string& path, const std::string& format) {
    return fr::load_catalog(path, format == "csv" ? fr::CatalogFormat::Csv : fr::CatalogFormat::Jsonl).catalog.items;
  }, py::arg("path"), py::arg("format") = "jsonl");
  m.def("clean", [](const std::vector<fr::Item>& items) { return fr::clean(fr::Catalog{items}).items; });
  m.def("tokenize", [](const std::string& s) { return fr::text::tokenize(s); });
  m.def("fallback_encode", [](const std::string& s) { return fr::fallback_encode(s); },
        "Hashed 768-d unit vector for a description");
  m.def("cosine", [](const std::vector<double>& a, const std::vector<double>& b) { return fr::cosine(a, b); });

  py::class_<fr::GenreEmbeddingModel>(m, "GenreEmbeddingModel")
      .def_static("load", &fr::GenreEmbeddingModel::load)
      .def_property_readonly("vocabulary", &fr::GenreEmbeddingModel::vocabulary)
      .def("embed", [](const fr::GenreEmbeddingModel& g, const std::string& t) { return g.embed(t); })
      .def("embed_set", [](const fr::GenreEmbeddingModel& g, const std::vector<std::string>& ts) { return g.embed_set(ts); });

  py::class_<fr::TfidfModel>(m, "TfidfModel")
      .def_static("fit", [](const std::vector<std::string>& docs) { return fr::TfidfModel::fit(docs); })
      .def_static("load", &fr::TfidfModel::load)
      .def_property_readonly("terms", &fr::TfidfModel::terms)
      .def_property_readonly("idf", &fr::TfidfModel::idf)
      .def("transform", [](const fr::TfidfModel& t, const std::string& text) {
        const auto v = t.transform(text);
        std::vector<std::pair<std::uint32_t, double>> out;
        for (std::size_t i = 0; i < v.nnz(); ++i) out.emplace_back(v.indices[i], v.weights[i]);
        return out;
      });

  py::class_<fr::Recommendation>(m, "Recommendation")
      .def_readonly("target_id", &fr::Recommendation::target_id)
      .def_readonly("rank", &fr::Recommendation::rank)
      .def_property_readonly("combined", [](const fr::Recommendation& r) { return r.breakdown.combined; })
      .def_property_readonly("fusion_sim", [](const fr::Recommendation& r) { return r.breakdown.fusion_sim; })
      .def_property_readonly("genre_sim", [](const fr::Recommendation& r) { return r.breakdown.genre_sim; })
      .def_property_readonly("tfidf_sim", [](const fr::Recommendation& r) { return r.breakdown.tfidf_sim; })
      .def("__repr__", [](const fr::Recommendation& r) {
        return "<Recommendation " + std::to_string(r.rank) + " " + r.target_id + " " +
               std::to_string(r.breakdown.combined) + ">";
      });

  py::class_<Engine>(m, "Engine")
      .def(py::init<const std::string&, const std::string&, const std::string&, const std::string&,
                    const std::string&, const std::string&>(),
           py::arg("catalog"), py::arg("genre_model"), py::arg("model"), py::arg("index"), py::arg("tfidf"),
           py::arg("embeddings") = "")
      .def("recommend", &Engine::recommend, py::arg("seeds"), py::arg("k") = 10, py::arg("weights") = "")
      .def_property_readonly("size", &Engine::size)
      .def_property_readonly("provider_id", &Engine::provider_id);
}
