#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "tagsiege/errors.hpp"
#include "tagsiege/harness.hpp"
#include "tagsiege/io.hpp"
#include "tagsiege/metrics.hpp"
#include "tagsiege/retrieval.hpp"
#include "tagsiege/synth.hpp"
#include "tagsiege/text.hpp"

namespace py = pybind11;
using namespace tagsiege;

namespace {

py::dict outcome_dict(const harness::RunOutcome& r, const std::string& log) {
  py::dict d;
  d["exit_code"] = r.exit_code;
  d["message"] = r.message;
  d["manifest_path"] = r.manifest_path.string();
  d["manifest_json"] = r.manifest_json;
  d["log"] = log;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of tagsiege";
  m.attr("__version__") = std::string(harness::tool_version());

  static const py::handle error_type = py::exception<Error>(m, "TagsiegeError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string message = std::string(to_string(e.kind())) + ": " + e.what();
      py::set_error(error_type, message.c_str());
    }
  });

  py::enum_<Split>(m, "Split")
      .value("train", Split::Train)
      .value("val", Split::Val)
      .value("test", Split::Test);

  py::class_<TextAttributedGraph>(m, "Graph")
      .def_property_readonly("node_count", &TextAttributedGraph::node_count)
      .def_property_readonly("edge_count", &TextAttributedGraph::edge_count)
      .def_property_readonly("class_count", &TextAttributedGraph::class_count)
      .def_property_readonly("texts", &TextAttributedGraph::texts)
      .def_property_readonly("labels", &TextAttributedGraph::labels)
      .def_property_readonly("edges",
                             [](const TextAttributedGraph& g) {
                               std::vector<std::pair<NodeId, NodeId>> out;
                               for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v);
                               return out;
                             })
      .def("nodes_in", &TextAttributedGraph::nodes_in)
      .def("neighbors",
           [](const TextAttributedGraph& g, NodeId v) {
             const auto n = g.neighbors(v);
             return std::vector<NodeId>(n.begin(), n.end());
           })
      .def("save", [](const TextAttributedGraph& g, const std::filesystem::path& dir) { save_graph(g, dir); })
      .def("__eq__", &TextAttributedGraph::operator==);

  m.def("load_graph", [](const std::filesystem::path& dir) { return load_graph(dir); }, py::arg("directory"));

  m.def(
      "generate",
      [](std::size_t nodes, int classes, double p_in, double p_out, std::size_t tokens_per_text,
         double noise_rate, std::uint64_t seed) {
        SynthConfig c;
        c.node_count = nodes;
        c.class_count = classes;
        c.p_in = p_in;
        c.p_out = p_out;
        c.tokens_per_text = tokens_per_text;
        c.noise_rate = noise_rate;
        c.seed = seed;
        return generate(c);
      },
      py::arg("nodes") = SynthConfig{}.node_count, py::arg("classes") = SynthConfig{}.class_count,
      py::arg("p_in") = SynthConfig{}.p_in, py::arg("p_out") = SynthConfig{}.p_out,
      py::arg("tokens_per_text") = SynthConfig{}.tokens_per_text,
      py::arg("noise_rate") = SynthConfig{}.noise_rate, py::arg("seed") = 0);

  m.def(
      "tfidf",
      [](const TextAttributedGraph& g, std::size_t vocab_size) {
        const auto vocab = build_vocabulary(g, vocab_size);
        return py::make_tuple(Eigen::MatrixXd(featurize(g.texts(), vocab)), vocab.terms());
      },
      py::arg("graph"), py::arg("vocab_size") = 5000,
      "TF-IDF matrix of the node texts and its vocabulary terms.");

  m.def("homophily_edge", [](const TextAttributedGraph& g, const Eigen::MatrixXd& x) {
    return homophily_edge(g, x);
  });
  m.def("homophily_node", [](const TextAttributedGraph& g, const Eigen::MatrixXd& x) {
    return homophily_node(g, x);
  });

  m.def(
      "retrieve_influencers",
      [](const Eigen::MatrixXd& z, NodeId target, std::size_t k) {
        std::vector<std::pair<NodeId, double>> out;
        for (const Candidate& c : retrieve_influencers(z, target, k).candidates) {
          out.emplace_back(c.node, c.dissimilarity);
        }
        return out;
      },
      py::arg("embeddings"), py::arg("target"), py::arg("k") = 5,
      "Most dissimilar nodes to `target` as (node, 1 - cosine) pairs.");

  m.def("commands", &harness::command_names);
  m.def("defaults", [](const std::string& command) { return harness::defaults(command); });
  m.def(
      "run",
      [](const std::string& command, const harness::Config& flags) {
        std::ostringstream log;
        harness::RunOutcome r;
        {
          py::gil_scoped_release release;
          r = harness::run(command, harness::resolve(command, {}, flags), log);
        }
        return outcome_dict(r, log.str());
      },
      py::arg("command"), py::arg("config") = harness::Config{},
      "Runs a command with the given keys on top of its defaults.");
  m.def(
      "replay",
      [](const std::filesystem::path& manifest, const harness::Config& overrides) {
        std::ostringstream log;
        harness::RunOutcome r;
        {
          py::gil_scoped_release release;
          r = harness::replay(manifest, overrides, log);
        }
        return outcome_dict(r, log.str());
      },
      py::arg("manifest"), py::arg("overrides") = harness::Config{});
}
