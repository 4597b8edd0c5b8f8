class ValueStore {
    private String valueA;
    private String valueB;

    public void update(String tmp) {
        valueA = tmp;
        // <start>
        use(value);
        // <end>
    }
}
