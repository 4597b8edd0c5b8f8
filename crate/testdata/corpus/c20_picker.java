class Picker {
    public void choose() {
        int itemA = 1;
        int itemB = 2;
        // <start>
        take(item);
        // <end>
    }
}
