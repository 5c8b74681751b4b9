#pragma once
// Small hand-made inputs shared by several test files.

#include <functional>
#include <sstream>
#include <string>

#include "lexiphylo/corpus.hpp"
#include "lexiphylo/error.hpp"

namespace fixture {

// Code of the Error thrown by f, 0 if nothing was thrown.
inline int code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const lexiphylo::Error& e) {
        return static_cast<int>(e.code());
    }
    return 0;
}

inline int code(lexiphylo::ErrorCode c) { return static_cast<int>(c); }

inline std::string corpus_header() {
    return "doculect_id,doculect_name,family,classification_path,latitude,longitude,concept,transcription\n";
}

// Old and Modern English, dog and tree only.
inline lexiphylo::Corpus english() {
    std::istringstream in(corpus_header() +
                          "ANG,Old English,IE,IE/Germanic,,,dog,hund\n"
                          "ANG,Old English,IE,IE/Germanic,,,tree,treow\n"
                          "ENG,English,IE,IE/Germanic,,,dog,dag\n"
                          "ENG,English,IE,IE/Germanic,,,tree,tri\n");
    return lexiphylo::read_corpus(in);
}

}  // namespace fixture
