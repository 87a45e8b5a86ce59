//! Bundled language definitions and example trees.
//!
//! `DNA`, `BOXES`, ... are the shipped `.pld` files. The `FIG_*` constants
//! are the listings as originally published, kept for parse-count checks;
//! some of them need small fixes before they can run (see the shipped files).

pub const DNA: &str = include_str!("../corpus/dna.pld");
pub const BOXES: &str = include_str!("../corpus/boxes.pld");
pub const LAMBDA: &str = include_str!("../corpus/lambda.pld");
pub const NESTED_GRAPH: &str = include_str!("../corpus/nested-graph.pld");
pub const CLASS_MODELS: &str = include_str!("../corpus/class-models.pld");
pub const USE_CASES: &str = include_str!("../corpus/use-cases.pld");
pub const DUNGEON: &str = include_str!("../corpus/dungeon.pld");

/// `(name, source, start clause)` for every bundled language.
pub const LANGUAGES: &[(&str, &str, &str)] = &[
    ("dna", DNA, "DNA"),
    ("boxes", BOXES, "root"),
    ("lambda", LAMBDA, "exp"),
    ("nested-graph", NESTED_GRAPH, "machine"),
    ("class-models", CLASS_MODELS, "model"),
    ("use-cases", USE_CASES, "diagram"),
    ("dungeon", DUNGEON, "game"),
];

pub const FIG_DNA: &str = r#"(deflang DNA
  (abstract
   [DNA (gene (* letter))]
   [letter (or (a) (c) (t) (g))])
  (reduce
   [(gene letter ...) (seq letter ...)]
   [(a) "A"]
   [(c) "C"]
   [(t) "T"]
   [(g) "G"]))"#;

pub const FIG_BOXES: &str = r#"(deflang boxes
  (abstract [root (root (boxes) tree)] [tree (or (tree str (* tree)) (leaf str))])
  (transform
   [(send (root _ t) (key-pressed _ #\t)) (root (tree) t)]
   [(send (root _ t) (key-pressed _ #\b)) (root (boxes) t)])
  (reduce
   [(root (boxes) t) (tree->boxes t)]
   [(root (tree) t)  (tree->tree t)]
   [(tree->boxes (tree data child ...))
    (hbox (outline 1) (centre data) (align (vbox (outline 1) (align (tree->boxes child)) ...)))]
   [(tree->boxes (leaf d)) d]
   [(tree->tree  (tree data child ...)) (tree data (tree->tree child) ...)]
   [(tree->tree  (leaf d)) d]))"#;

pub const FIG_LAMBDA: &str = r#"(deflang lambda-calculus
  (abstract
   [exp (or 
         (const str) 
         (pair exp exp) 
         (ident str) 
         (apply exp exp) 
         (lambda str exp))]) 

  (transform
   [(send t (key-pressed _ #\e))         (eval-step t)]

   [(eval-step (lambda arg exp))         (lambda arg (eval-step exp))]
   [(eval-step (pair exp1 exp2))         (pair (eval-step exp1) (eval-step exp2))]
   [(eval-step exp)                      (eval exp)]

   [(eval (apply (lambda arg body) exp)) (subst exp arg body)]
   [(eval (apply exp1 exp2))             (apply (eval exp1) exp2)]
   [(eval exp)                           exp]

   [(subst new old (const k))            (const k)]
   [(subst new old (pair first second))  (pair (subst new old first) (subst new old second))]
   [(subst new old (ident old))          new]
   [(subst _   old (ident name))         (ident name)]
   [(subst new old (apply exp1 exp2))    (apply (subst new old exp1) (subst new old exp2))]
   [(subst new old (lambda old exp))     (lambda old exp)]
   [(subst new old (lambda arg exp))     (lambda arg (subst new old exp))])

  (reduce
   [((hole _) h)  h]
   [(ident s)     s]
   [(const k)     k]
   [(pair e1 e2)  (tree "." e1 e2)]
   [(apply e1 e2) (tree "@" e1 e2)]
   [(lambda i e)  (tree (hbox (fixed) (align "λ") (align i)) e)]))"#;

/// As published: the descent rule stores the unbound `id`.
pub const FIG_NESTED_GRAPH: &str = r#"(deflang nested-graph
  (abstract
   [machine (machine G (empty))]
   [G (graph (entities (* entity)) (relationships))]
   [entity (entity G)])
  (transform 
   [(send (machine (graph (entities e1 ... ((entity i) g) e2 ...) r) dump) (double-click (list _ i)))
    (machine g (dump id (graph (entities e1 ... e2 ...) r) dump)) ]
   [(send (machine g (dump i (graph (entities e ...) r) d)) (key-pressed _ "up"))
    (machine (graph (entities ((entity i) g) e ...) r)  d)]
   [(send (machine (graph n (relationships r ...)) d) (new-edge type source target))
    (machine (graph n (relationships (relationship source target) r ...)) d)])
  (reduce
   [(machine g _) (->graph g)]
   [(->thumbnail (graph (entities e ... _) (relationships r ...)))
    (thumbnail 0 0 40 40 (graph (edge-types (edge (entity) (entity))) (->node e) ... (->edge r) ...))]
   [(->graph (graph (entities e ...) (relationships r ...)))
    (graph (edge-types (edge (entity) (entity))) (->node e) ... (->edge r) ...)]
   [(->node ((hole i) h)) ((node "n" i) (entity) i h)]
   [(->node ((entity i) g))
    ((node "n" i) (entity) i ((box "b" i) (align (ellipse 0 0 50 50 #f #f)) (align (->thumbnail g))))]
   [(->edge ((relationship r) source target)) ((edge r) source (none)  target (arrow))])) "#;

/// The class-model listing without its locals, which were published separately.
pub const FIG_CLASS_MODELS: &str = r#"(deflang class-models
  (abstract
   [model (model (classes (* class)) (assocs))]
   [class (class (graphical) str (* field))]
   [field (field str type)]
   [type (or (string) (integer) (boolean))])
  (transform
   [(send (model (classes c1 ... ((class i) m n f ...) c2 ...) assocs) (double-click (list _ i)))
    (change-mode ((class i) m n f ...) (classes c1 ... c2 ...) assocs)]
   [(send  (model cs (assocs a ...)) (new-edge (assoc) s t)) 
    (model cs (assocs (assoc str s t) a ...))])
  (reduce
   [(model (classes c ...) (assocs a ...))
    (graph  (edge-types (assoc (class) (class))) (class->node c) ... (assoc->edge a) ...)]   
   [(class->node ((hole i) h)) ((node "create-class" i) (new-class) i h)]   
   [(class->node ((class i) (graphical) name field ...)) (class-g-node i name field ...)]  
   [(class->node ((class i) (textual) name field ...)) (class-t-node i name field ...)] 
   [(assoc->edge ((assoc i) n sid tid)) 
    ((edge i) sid (none) tid (arrow) ((label "l" i) (target) (down-font 3 n)))]))"#;

/// The decision tree used to introduce the boxes language.
pub const ANIMAL_TREE: &str = r#"(root (tree)
  (tree "hair?"
    (tree "legs < 5?" (leaf "mammal") (leaf "insect"))
    (tree "feathers?"
      (leaf "bird")
      (tree "tail?"
        (tree "legs < 2?"
          (leaf "fish")
          (tree "legs < 6?" (leaf "reptile") (leaf "shellfish")))
        (tree "legs < 5?" (leaf "frog") (leaf "insect"))))))"#;

/// The Y combinator.
pub const Y: &str = r#"(lambda "f"
  (apply
    (lambda "x"
      (apply
        (ident "f")
        (apply (ident "x") (ident "x"))))
    (lambda "x"
      (apply
        (ident "f")
        (apply (ident "x") (ident "x"))))))"#;

/// `Y` applied to `λL.(1, L)`. The published text writes the body's
/// identifier as lower-case `l`, which leaves it free; `L` is used here.
pub const Y_ONES: &str = r#"(apply
  (lambda "f"
    (apply
      (lambda "x" (apply (ident "f") (apply (ident "x") (ident "x"))))
      (lambda "x" (apply (ident "f") (apply (ident "x") (ident "x"))))))
  (lambda "L" (pair (const "1") (ident "L"))))"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langdef::{load_language, validate_language};

    #[test]
    fn bundled_languages_validate() {
        for (name, src, start) in LANGUAGES {
            let def = load_language(src).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(validate_language(&def).is_empty(), "{name}: {:?}", validate_language(&def));
            assert!(def.clause(start).is_some(), "{name}");
        }
    }

    #[test]
    fn published_listings_parse() {
        let counts = |src| {
            let d = load_language(src).unwrap();
            (d.clauses.len(), d.locals.len(), d.transform_rules.len(), d.reduce_rules.len())
        };
        assert_eq!(counts(FIG_DNA), (2, 0, 0, 5));
        assert_eq!(counts(FIG_BOXES), (2, 0, 2, 6));
        assert_eq!(counts(FIG_LAMBDA), (1, 0, 14, 6));
        assert_eq!(counts(FIG_NESTED_GRAPH), (3, 0, 3, 6));
        assert_eq!(counts(FIG_CLASS_MODELS), (4, 0, 2, 5));
        assert!(validate_language(&load_language(FIG_LAMBDA).unwrap()).is_empty());
    }

    #[test]
    fn published_descent_rule_leaves_id_unbound() {
        let d = validate_language(&load_language(FIG_NESTED_GRAPH).unwrap());
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("id"), "{}", d[0].message);
    }

    #[test]
    fn shipped_dna_is_the_published_listing() {
        assert_eq!(DNA.trim_end(), FIG_DNA);
    }
}
