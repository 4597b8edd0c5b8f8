class SingleParam {
    public void accept(Tag tag) {
        // <start>
        use(item);
        // <end>
    }
}
